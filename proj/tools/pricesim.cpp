#include "pricesim/cli.hpp"

int main(int argc, char** argv) { return pricesim::cli_main(argc, argv); }
