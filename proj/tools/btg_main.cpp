#include "btground/cli.hpp"

int main(int argc, char** argv) { return btground::cli_main(argc, argv); }
