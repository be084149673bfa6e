import shutil
from logging import getLogger
from pathlib import Path
from typing import Any

import git

logger = getLogger(__name__)


def _open_repo() -> git.Repo | None:
    try:
        return git.Repo(search_parent_directories=True)
    except (git.InvalidGitRepositoryError, git.NoSuchPathError):
        return None


def _changed_files(repo: git.Repo) -> list[str]:
    unstaged = [item.a_path for item in repo.index.diff(None)]
    staged = [item.a_path for item in repo.index.diff('HEAD')] if repo.head.is_valid() else []
    untracked = set(repo.untracked_files)
    working_dir = Path(str(repo.working_dir))
    return sorted(
        {
            path
            for path in unstaged + staged
            if path is not None and path not in untracked and (working_dir / path).exists()
        }
    )


def git_provenance() -> dict[str, Any] | None:
    """Branch, commit and dirty flag of the repository containing the working directory.

    Returns ``None`` outside a git repository.
    """
    repo = _open_repo()
    if repo is None or not repo.head.is_valid():
        return None
    branch = 'detached' if repo.head.is_detached else repo.active_branch.name
    return {
        'branch': branch,
        'commit': repo.head.object.hexsha,
        'dirty': repo.is_dirty(untracked_files=False),
    }


def save_git_status(output_dir: Path) -> None:
    """Copy the files with staged or unstaged changes into ``output_dir/git/changes``.

    ``output_dir/git/changes.txt`` lists the copied paths relative to the repository root.
    Nothing is written outside a git repository.
    """
    repo = _open_repo()
    if repo is None or not repo.head.is_valid():
        logger.info('No git repository found, skipping git status')
        return

    changes = _changed_files(repo)
    git_dir = output_dir / 'git'
    changes_dir = git_dir / 'changes'
    changes_dir.mkdir(parents=True, exist_ok=True)
    (git_dir / 'changes.txt').write_text('\n'.join(changes), encoding='utf-8')

    working_dir = Path(str(repo.working_dir))
    for change in changes:
        destination = changes_dir / change
        destination.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy(working_dir / change, destination)
    logger.info('Saved %d changed files to %s', len(changes), str(changes_dir))
