#include "cli.hpp"

int main(int argc, char** argv) { return modkalm::cli::Run(argc, argv); }
