#include "kernelgauge/cli.hpp"

int main(int argc, char** argv) { return kernelgauge::run_command(argc, argv); }
