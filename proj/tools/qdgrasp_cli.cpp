#include <qdgrasp/cli.hpp>

int main(int argc, char** argv) { return qdgrasp::cli_main(argc, argv); }
