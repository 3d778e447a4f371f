#include "vattr/cli.hpp"

int main(int argc, char** argv) { return vattr::run_cli(argc, argv); }
