#pragma once

#include "smoothsdp/sparse_sym.hpp"
#include "smoothsdp/rng.hpp"
#include "smoothsdp/eig.hpp"
#include "smoothsdp/manifold.hpp"
#include "smoothsdp/problem.hpp"
#include "smoothsdp/certificate.hpp"
#include "smoothsdp/rtr.hpp"
#include "smoothsdp/staircase.hpp"
#include "smoothsdp/maxcut.hpp"
