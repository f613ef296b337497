#pragma once

#include <psm/rational.hpp>
#include <psm/problem.hpp>
#include <psm/compare.hpp>
#include <psm/ps.hpp>
#include <psm/dl_best_response.hpp>
#include <psm/sequential_allocation.hpp>
#include <psm/oracle.hpp>
#include <psm/hardness.hpp>
#include <psm/instance_io.hpp>
#include <psm/experiment.hpp>
