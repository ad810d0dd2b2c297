#include "fsbp/cli.hpp"

int main(int argc, char** argv) { return fsbp::cli::run(argc, argv); }
