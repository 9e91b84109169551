#include "aqua/cli.hpp"

int main(int argc, char** argv) { return aqua::run_cli(argc, argv); }
