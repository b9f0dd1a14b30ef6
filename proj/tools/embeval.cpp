#include "embeval/cli.hpp"

int main(int argc, char** argv) { return embeval::cli::run(argc, argv); }
