#include <gtest/gtest.h>

#include "mfhypo/certifier.hpp"
#include "mfhypo/funcineq.hpp"
#include "mfhypo/meanfield.hpp"
#include "mfhypo/simulator.hpp"

TEST(Smoke, Compiles) { SUCCEED(); }
