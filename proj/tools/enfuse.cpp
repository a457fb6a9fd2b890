#include "enfuse/cli.hpp"

int main(int argc, char** argv) { return enfuse::cli::main(argc, argv); }
