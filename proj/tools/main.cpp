#include "ace/cli.hpp"

int main(int argc, char** argv) { return ace::cli_main(argc, argv); }
