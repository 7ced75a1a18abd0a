#include "cli/commands.hpp"

int main(int argc, char** argv) { return robust_affine::cli::run_main(argc, argv); }
