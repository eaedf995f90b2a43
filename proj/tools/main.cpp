#include "kdvlab/cli.hpp"

int main(int argc, char** argv) { return kdvlab::run_cli(argc, argv); }
