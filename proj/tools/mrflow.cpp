#include "mrflow/cli/commands.hpp"

int main(int argc, char** argv) { return mrflow::cli::main_entry(argc, argv); }
