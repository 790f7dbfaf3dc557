#include "netlasso/cli.hpp"

int main(int argc, char** argv) { return netlasso::run_cli(argc, argv); }
