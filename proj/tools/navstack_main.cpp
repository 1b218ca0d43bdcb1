#include "navstack/cli.hpp"

int main(int argc, char** argv) { return navstack::cli::run(argc, argv); }
