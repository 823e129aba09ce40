#include "cli.hpp"

int main(int argc, char** argv) { return blockcov::cli::run(argc, argv); }
