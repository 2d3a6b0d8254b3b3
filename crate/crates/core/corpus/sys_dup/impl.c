/* sys_dup -- file descriptors */
int sys_dup(int oldfd, int newfd)
{
    struct proc *cur;

    if (!is_fd_valid(oldfd))
        return -EBADF;
    if (newfd < 0 || newfd >= NOFILE)
        return -EBADF;
    if (oldfd == newfd)
        return -EINVAL;
    cur = get_proc(current);
    cur->offs[newfd] = cur->offs[oldfd];
    return 0;
}
