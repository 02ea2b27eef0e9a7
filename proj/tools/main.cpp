#include "bayesio/cli.hpp"

int main(int argc, char** argv)
{
  return bayesio::cli_dispatch(argc, argv);
}
