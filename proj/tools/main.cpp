#include "cli.hpp"

int main(int argc, char** argv) { return cayley::cli::parse_and_dispatch(argc, argv); }
