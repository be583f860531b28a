#include <synthcity/cli.hpp>

int main(int argc, char** argv) { return synthcity::run_cli(argc, argv); }
