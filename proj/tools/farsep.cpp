#include "farsep/cli.hpp"

int main(int argc, char** argv) { return farsep::cli::run(argc, argv); }
