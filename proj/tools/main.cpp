#include "run_config.hpp"

int main(int argc, char** argv) { return sufcast::cli::run(argc, argv); }
