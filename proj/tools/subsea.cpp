#include "subsea/cli.hpp"

int main(int argc, char** argv) { return subsea::cli_main(argc, argv); }
