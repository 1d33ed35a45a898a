#include "abmal/cli.hpp"

int main(int argc, char** argv) { return abmal::run_cli(argc, argv); }
