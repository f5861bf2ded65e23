#include "run.hpp"

int main(int argc, char** argv) { return confmatch::cli::main_entry(argc, argv); }
