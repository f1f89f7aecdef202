#include "socgcf/cli.hpp"

int main(int argc, char** argv) { return socgcf::run_cli(argc, argv); }
