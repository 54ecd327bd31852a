#include "cli.hpp"

int main(int argc, char** argv) { return holobec::cli::main_entry(argc, argv); }
