#pragma once

#include <stdexcept>
#include <string>

namespace wheelforge {

/// Base class for all recoverable pipeline errors. Per-design failures are
/// caught at stage boundaries and recorded in the manifest; they never abort
/// a batch.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class SingularSystem : public Error {
public:
  explicit SingularSystem(const std::string& what) : Error(what) {}
};

class DimensionMismatch : public Error {
public:
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

class BisectionFailure : public Error {
public:
  explicit BisectionFailure(const std::string& what) : Error(what) {}
};

class EmptyGrid : public Error {
public:
  explicit EmptyGrid(const std::string& what) : Error(what) {}
};

class EmptyMask : public Error {
public:
  explicit EmptyMask(const std::string& what) : Error(what) {}
};

class EmptyList : public Error {
public:
  explicit EmptyList(const std::string& what) : Error(what) {}
};

class NoSurface : public Error {
public:
  explicit NoSurface(const std::string& what) : Error(what) {}
};

class DegenerateMesh : public Error {
public:
  explicit DegenerateMesh(const std::string& what) : Error(what) {}
};

class NotWatertight : public Error {
public:
  explicit NotWatertight(const std::string& what) : Error(what) {}
};

class Disconnected : public Error {
public:
  explicit Disconnected(const std::string& what) : Error(what) {}
};

class EigenNonConvergence : public Error {
public:
  explicit EigenNonConvergence(const std::string& what) : Error(what) {}
};

class DegenerateRange : public Error {
public:
  explicit DegenerateRange(const std::string& what) : Error(what) {}
};

class NoOverlap : public Error {
public:
  explicit NoOverlap(const std::string& what) : Error(what) {}
};

class NonPositiveGroundTruth : public Error {
public:
  explicit NonPositiveGroundTruth(const std::string& what) : Error(what) {}
};

class EmptyVolume : public Error {
public:
  explicit EmptyVolume(const std::string& what) : Error(what) {}
};

class EmptyMesh : public Error {
public:
  explicit EmptyMesh(const std::string& what) : Error(what) {}
};

class InsufficientDesigns : public Error {
public:
  explicit InsufficientDesigns(const std::string& what) : Error(what) {}
};

class RankDeficient : public Error {
public:
  explicit RankDeficient(const std::string& what) : Error(what) {}
};

class MissingPredecessor : public Error {
public:
  explicit MissingPredecessor(const std::string& what) : Error(what) {}
};

class ConfigInvalid : public Error {
public:
  explicit ConfigInvalid(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(what) {}
};

class EmptyManifest : public Error {
public:
  explicit EmptyManifest(const std::string& what) : Error(what) {}
};

}  // namespace wheelforge
