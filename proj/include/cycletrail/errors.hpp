#pragma once

#include <stdexcept>
#include <string>

namespace cycletrail {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError final : public Error {
 public:
  using Error::Error;
};

// geo
class NonPositiveInterval final : public Error {
 public:
  using Error::Error;
};

// gpx / preprocess
class MalformedGpx final : public Error {
 public:
  using Error::Error;
};
class EmptyTrack final : public Error {
 public:
  using Error::Error;
};

// road network
class MalformedOsm final : public Error {
 public:
  using Error::Error;
};
class UnknownNode final : public Error {
 public:
  using Error::Error;
};

// matcher
class NoMatch final : public Error {
 public:
  using Error::Error;
};
class RemoteUnavailable final : public Error {
 public:
  using Error::Error;
};
class RemoteRejected final : public Error {
 public:
  using Error::Error;
};
class ResponseParseError final : public Error {
 public:
  using Error::Error;
};

// enrichment
class NodeNotOnWay final : public Error {
 public:
  using Error::Error;
};

// metrics
class ZeroDuration final : public Error {
 public:
  using Error::Error;
};

// evaluation
class ZeroTruthLength final : public Error {
 public:
  using Error::Error;
};
class UnknownArc final : public Error {
 public:
  using Error::Error;
};

// pipeline
class NoInput final : public Error {
 public:
  using Error::Error;
};
class MissingStageOutput final : public Error {
 public:
  using Error::Error;
};
class NetworkLoadFailure final : public Error {
 public:
  using Error::Error;
};

}  // namespace cycletrail
