#include "lhv/runner.hpp"

int main(int argc, char** argv) { return lhv::cli_main(argc, argv); }
