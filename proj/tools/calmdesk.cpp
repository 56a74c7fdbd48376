#include "calmdesk/cli.hpp"

int main(int argc, char** argv) { return calmdesk::cli::main(argc, argv); }
