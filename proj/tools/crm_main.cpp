#include "cli/commands.hpp"

int main(int argc, char** argv) { return crm::cli::main(argc, argv); }
