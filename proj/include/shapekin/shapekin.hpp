#pragma once

#include "shapekin/compat.hpp"
#include "shapekin/errors.hpp"
#include "shapekin/grid.hpp"
#include "shapekin/io.hpp"
#include "shapekin/motion.hpp"
#include "shapekin/plastic.hpp"
#include "shapekin/poly.hpp"
#include "shapekin/shape.hpp"
#include "shapekin/strain.hpp"
#include "shapekin/tensor.hpp"
#include "shapekin/version.hpp"
