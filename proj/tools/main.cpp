#include "cli.hpp"

int main(int argc, char** argv) { return edeg::cli::run(argc, argv); }
