#include "itpa/cli.hpp"

int main(int argc, char** argv) { return itpa::run_cli(argc, argv, std::cout, std::cerr); }
