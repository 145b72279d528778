#include "thinvolt/harness.hpp"

int main(int argc, char** argv) { return thinvolt::cli_main(argc, argv); }
