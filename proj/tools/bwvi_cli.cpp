#include "bwvi/cli.hpp"

int main(int argc, char** argv) { return bwvi::cli_main(argc, argv); }
