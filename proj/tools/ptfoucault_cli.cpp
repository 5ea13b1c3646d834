#include "ptfoucault/cli.hpp"

int main(int argc, char** argv) { return ptfoucault::cli::run(argc, argv); }
