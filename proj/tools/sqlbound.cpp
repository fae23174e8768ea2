#include "sqlbound/cli.hpp"

int main(int argc, char** argv) { return sqlbound::cli_main(argc, argv); }
