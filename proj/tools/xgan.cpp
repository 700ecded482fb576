#include "commands.hpp"

int main(int argc, char** argv) { return xgan::cli::run(argc, argv); }
