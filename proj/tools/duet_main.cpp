#include "duet/cli.hpp"

int main(int argc, char** argv) { return duet::cli::cli_main(argc, argv); }
