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

#include "beamlab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace beamlab
{

std::string format_real(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

std::string CsvWriter::escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        if (i)
            out_ << ',';
        out_ << escape(cells[i]);
    }
    out_ << "\r\n";
}

std::vector<std::vector<std::string>> read_csv(std::istream& in)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    char c;
    while (in.get(c))
    {
        any = true;
        if (quoted)
        {
            if (c == '"')
            {
                if (in.peek() == '"')
                {
                    field += '"';
                    in.get();
                }
                else
                    quoted = false;
            }
            else
                field += c;
            continue;
        }
        if (c == '"')
            quoted = true;
        else if (c == ',')
        {
            row.push_back(std::move(field));
            field.clear();
        }
        else if (c == '\r')
            continue;
        else if (c == '\n')
        {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        }
        else
            field += c;
    }
    if (any)
    {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace beamlab
