#include "udd/cli.hpp"

int main(int argc, char** argv) { return udd::run_cli(argc, argv); }
