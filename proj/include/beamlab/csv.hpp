/*
 *   Copyright 2026 The beamlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BEAMLAB_CSV_HPP
#define BEAMLAB_CSV_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace beamlab
{

/// Real number with 9 significant digits ("%.9g"); non-finite values print as nan/inf/-inf.
std::string format_real(double x);

/// RFC 4180 writer: CRLF line endings, fields quoted only when they contain
/// a comma, quote, CR or LF.
class CsvWriter
{
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& cells);

    static std::string escape(std::string_view field);

private:
    std::ostream& out_;
};

/// Minimal reader for files written by CsvWriter; handles quoted fields.
std::vector<std::vector<std::string>> read_csv(std::istream& in);

} // namespace beamlab

#endif // BEAMLAB_CSV_HPP
