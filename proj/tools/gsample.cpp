#include "gsample/cli.hpp"

int main(int argc, char** argv) { return gsample::cli::run_cli(argc, argv); }
