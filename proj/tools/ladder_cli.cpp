#include "ladder/cli.hpp"

int main(int argc, char** argv) { return ladder::cli_main(argc, argv); }
