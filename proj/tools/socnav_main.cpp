#include "socnav/cli.hpp"

int main(int argc, char** argv) { return socnav::cli::main(argc, argv); }
