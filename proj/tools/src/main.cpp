#include "jhol/cli/app.hpp"

int main(int argc, char** argv) { return jhol::cli::main_entry(argc, argv); }
