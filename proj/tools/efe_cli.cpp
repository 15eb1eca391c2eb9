#include "efe/harness/cli.hpp"

int main(int argc, char** argv) { return efe::harness::cli_main(argc, argv); }
