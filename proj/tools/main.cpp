#include "dfept/cli.hpp"

int main(int argc, char** argv) { return dfept::run_cli(argc, argv); }
