#include "qtnet/cli.hpp"

int main(int argc, char** argv) { return qtnet::cli::main(argc, argv); }
