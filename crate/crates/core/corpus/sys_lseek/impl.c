/* sys_lseek -- file descriptors */
int sys_lseek(int fd, off_t offset)
{
    struct proc *cur;

    if (fd < 0 || fd >= NOFILE)
        return -EBADF;
    if (offset < 0)
        return -EINVAL;
    cur = get_proc(current);
    cur->offs[fd] = offset;
    return 0;
}
