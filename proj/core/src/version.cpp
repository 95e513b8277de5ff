#include "smcflow/version.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <gsl/gsl_version.h>

#include "smcflow_config.hpp"

namespace smc {

std::string version() { return SMCFLOW_VERSION; }

std::vector<std::pair<std::string, std::string>> dependency_versions() {
  auto dotted = [](int a, int b, int c) {
    return std::to_string(a) + "." + std::to_string(b) + "." + std::to_string(c);
  };
  return {
      {"eigen", dotted(EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"fftw", fftw_version},
      {"gsl", gsl_version},
      {"boost", dotted(BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000, BOOST_VERSION % 100)},
  };
}

}  // namespace smc
