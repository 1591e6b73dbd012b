#include "nser/cli.hpp"

int main(int argc, char** argv) { return nser::run_cli(argc, argv); }
