import os

def read_first_matching_file(file_name:str, search_paths:list[str], suffixes:list[str] = None) -> str|None:
    """
    Return the contents of the first file named `file_name` (optionally with one of the suffixes)
    found in the search paths, or None if nothing matches
    """
    candidates = [file_name] + [file_name + suffix for suffix in (suffixes or [])]

    for path in search_paths:
        if path is None: continue

        for candidate in candidates:
            full_path = os.path.join(path, candidate)
            if os.path.isfile(full_path):
                with open(full_path, 'r', encoding="utf-8") as f:
                    return f.read()

    return None


def output_path(output_dir:str, file_name:str) -> str:
    """
    Resolve an artifact path inside the output directory (creating the directory if needed).
    Names that would escape the directory are rejected.
    """
    root = os.path.realpath(output_dir)
    full_path = os.path.realpath(os.path.join(root, file_name))
    if os.path.commonpath([root, full_path]) != root:
        raise ValueError(f"Artifact '{file_name}' would be written outside of the output directory '{output_dir}'")

    os.makedirs(os.path.dirname(full_path), exist_ok=True)
    return full_path


def write_text(output_dir:str, file_name:str, content:str) -> str:
    full_path = output_path(output_dir, file_name)
    ## newline="" keeps the bytes identical across platforms
    with open(full_path, 'w', encoding="utf-8", newline="") as f:
        f.write(content)
    return full_path
