import sys
from pathlib import Path

from dotenv import load_dotenv
from pydantic import ValidationError

import config


def check_env() -> int:
    print("Checking EDD_* settings...")
    load_dotenv(dotenv_path=Path(__file__).parent / ".env", encoding="utf-8-sig")
    try:
        settings = config.reload_settings()
    except ValidationError as e:
        print(f"Invalid settings:\n{e}")
        return 1
    for name, value in settings.dict().items():
        print(f"  EDD_{name.upper()} = {value!r}")
    preset_dir = Path(settings.preset_dir)
    if not preset_dir.is_dir():
        print(f"Preset directory {preset_dir} not found")
        return 1
    print(f"  {len(list(preset_dir.glob('*.json')))} sweep presets in {preset_dir}")
    print("Settings OK.")
    return 0


if __name__ == "__main__":
    sys.exit(check_env())
