#include "vesselforge/cli.hpp"

int main(int argc, char** argv) { return vesselforge::run_cli(std::vector<std::string>(argv + 1, argv + argc)); }
