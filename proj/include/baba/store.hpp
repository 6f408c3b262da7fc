#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "baba/archive.hpp"

namespace baba {

/// Archive snapshots are JSON documents:
///
///   { "format": "babayall-archive", "version": 1, "next_id": N,
///     "records": [...], "cells": [...], "ratings": [...], "seed_corpus": [...] }
///
/// Rule flags are stored as 9-character strings of '0'/'1' in canonical
/// flag order, so the file stays readable.
std::string snapshot_to_json(const ArchiveSnapshot& snapshot);

/// Throws Error(InvalidLevel) for malformed documents, an unknown version
/// (message names the version) or a failed integrity check.
ArchiveSnapshot snapshot_from_json(std::string_view text);

/// Writes to a temporary sibling and renames it over `path`, so a crash
/// leaves the previous snapshot intact.
void save_snapshot(const std::filesystem::path& path, const ArchiveSnapshot& snapshot);
ArchiveSnapshot load_snapshot(const std::filesystem::path& path);

struct NamedLevel {
  std::string name;
  std::string text;
};

/// Ten small solvable levels used as evolver references while the archive
/// has no elites.
const std::vector<NamedLevel>& seed_corpus();

/// Reads every *.txt level in `dir`, sorted by file name.
std::vector<NamedLevel> load_level_dir(const std::filesystem::path& dir);
/// Writes each level as <name>.txt into `dir`, creating it if needed.
void write_level_dir(const std::filesystem::path& dir, const std::vector<NamedLevel>& levels);

}  // namespace baba
