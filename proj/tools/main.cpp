#include "commands.hpp"

int main(int argc, char** argv) { return fcc::cli::run(argc, argv); }
