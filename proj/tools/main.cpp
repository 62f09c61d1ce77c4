#include "radolearn/experiment.hpp"

int main(int argc, char** argv) { return rado::run_cli(argc, argv); }
