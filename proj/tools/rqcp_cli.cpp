#include <rqcp/cli.hpp>

int main(int argc, char** argv) { return rqcp::run_command(argc, argv); }
