#include "lplasma/cli.hpp"

int main(int argc, char** argv) { return lplasma::run_cli(argc, argv); }
