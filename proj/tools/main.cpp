#include "sdclf/cli_app.hpp"

int main(int argc, char** argv) { return sdclf::run_cli(argc, argv); }
