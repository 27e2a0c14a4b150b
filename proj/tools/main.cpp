#include "dgue/cli.hpp"

int main(int argc, char** argv) { return dgue::run_cli(argc, argv); }
