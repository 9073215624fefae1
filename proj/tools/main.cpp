#include "cli/commands.hpp"

int main(int argc, char** argv) { return ostro::cli::run(argc, argv); }
