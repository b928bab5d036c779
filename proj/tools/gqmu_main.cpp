#include "gqmu/cli.hpp"

int main(int argc, char** argv) { return gqmu::cli_dispatch(argc, argv); }
