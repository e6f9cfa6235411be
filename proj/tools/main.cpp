#include "ptkk/cli.hpp"

int main(int argc, char** argv) { return ptkk::cli::run(argc, argv); }
