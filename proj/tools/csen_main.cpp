#include "csen/cli.hpp"

int main(int argc, char** argv) { return csen::cli_main(argc, argv); }
