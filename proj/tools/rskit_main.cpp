#include "rskit/cli.hpp"

int main(int argc, char** argv) { return rskit::dispatch(argc, argv); }
