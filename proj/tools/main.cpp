#include "tailrank/cli.hpp"

int main(int argc, char** argv) { return tailrank::run_cli(argc, argv); }
