#include "cli.hpp"

int main(int argc, char** argv) { return nvphys::cli::run(argc, argv); }
