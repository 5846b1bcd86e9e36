#include "mql/cli.hpp"

int main(int argc, char** argv) { return mql::run_cli(argc, argv); }
