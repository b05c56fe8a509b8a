#include "paulsim/cli.hpp"

int main(int argc, char** argv) { return paulsim::cli::run(argc, argv); }
