#include "rely/cli.hpp"

int main(int argc, char** argv) { return rely::run_cli(argc, argv); }
